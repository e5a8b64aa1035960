"""Shared neural building blocks."""

import math

import torch
import torch.nn as nn


def sinusoidal_positions(length, d, dtype=torch.float32, device=None):
    pos = torch.arange(length, dtype=dtype, device=device).unsqueeze(1)
    idx = torch.arange(0, d, 2, dtype=dtype, device=device)
    angle = pos / torch.pow(torch.tensor(10000.0, dtype=dtype, device=device), idx / d)
    enc = torch.zeros(length, d, dtype=dtype, device=device)
    enc[:, 0::2] = torch.sin(angle)
    enc[:, 1::2] = torch.cos(angle[:, : enc[:, 1::2].shape[1]])
    return enc


class TransformerEncoderBlock(nn.Module):
    """Post-norm transformer encoder block: self-attention then feed-forward."""

    def __init__(self, d, heads, ffn_dim=None, dropout=0.0):
        super().__init__()
        ffn_dim = ffn_dim or 4 * d
        self.attn = nn.MultiheadAttention(d, heads, dropout=dropout, batch_first=True)
        self.norm1 = nn.LayerNorm(d)
        self.ffn = nn.Sequential(
            nn.Linear(d, ffn_dim), nn.ReLU(), nn.Linear(ffn_dim, d))
        self.norm2 = nn.LayerNorm(d)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x, key_padding_mask=None):
        attn_out, _ = self.attn(x, x, x, key_padding_mask=key_padding_mask,
                                need_weights=False)
        x = self.norm1(x + self.dropout(attn_out))
        x = self.norm2(x + self.dropout(self.ffn(x)))
        return x


class TransformerEncoder(nn.Module):
    """Token embedding + sinusoidal positions + a stack of encoder blocks."""

    def __init__(self, vocab_size, d, heads=8, layers=2, dropout=0.0,
                 extra_embedding=None):
        super().__init__()
        self.d = d
        self.embed = nn.Embedding(vocab_size, d, padding_idx=0)
        # optional second additive embedding (e.g. equation token kinds)
        self.extra_embed = extra_embedding
        self.blocks = nn.ModuleList(
            TransformerEncoderBlock(d, heads, dropout=dropout) for _ in range(layers))
        self.dropout = nn.Dropout(dropout)

    def embed_input(self, ids, extra_ids=None):
        x = self.embed(ids)
        if self.extra_embed is not None and extra_ids is not None:
            x = x + self.extra_embed(extra_ids)
        pos = sinusoidal_positions(ids.shape[-1], self.d, dtype=x.dtype,
                                   device=x.device)
        return x + pos

    def forward(self, ids, extra_ids=None, pad_mask=None):
        """ids: (B, L) int tensor; pad_mask: (B, L) bool, True at pads."""
        x = self.dropout(self.embed_input(ids, extra_ids))
        for block in self.blocks:
            x = block(x, key_padding_mask=pad_mask)
        if pad_mask is not None:
            x = x.masked_fill(pad_mask.unsqueeze(-1), 0.0)
        return x


def masked_global_attention(H, W_a, pad_mask=None):
    """Pooled vector via attention against the mean of the non-pad rows.

    H: (B, L, d); W_a: (d, d); pad_mask: (B, L) bool, True at pads.
    Returns (h_a, alpha): (B, d) and (B, L).
    """
    if pad_mask is None:
        pad_mask = torch.zeros(H.shape[:2], dtype=torch.bool, device=H.device)
    keep = (~pad_mask).to(H.dtype)
    lengths = keep.sum(dim=1, keepdim=True).clamp(min=1)
    h_bar = (H * keep.unsqueeze(-1)).sum(dim=1) / lengths
    logits = torch.einsum("bld,de,be->bl", H, W_a, h_bar)
    logits = logits.masked_fill(pad_mask, float("-inf"))
    alpha = torch.softmax(logits, dim=1)
    h_a = torch.einsum("bl,bld->bd", alpha, H)
    return h_a, alpha
