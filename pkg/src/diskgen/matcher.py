"""Domain-conditioned instance retrieval.

Scores every candidate problem text against the input equation (token-level
correlation) and the text-domain vector (bilinear pooled score), normalizes
over the pool, and is supervised by a similarity-oracle-annotated label.
"""

from dataclasses import dataclass, field

import torch
import torch.nn as nn

from .corpus import TokenKind
from .errors import ConfigError, EmptyInputError
from .layers import TransformerEncoder, masked_global_attention

KIND_IDS = {kind: i for i, kind in enumerate(TokenKind)}


def token_f1(candidate_tokens, reference_tokens):
    """Greedy exact-match token F1 (one-hot analogue of greedy soft matching)."""
    if not candidate_tokens or not reference_tokens:
        return 0.0
    ref_set = set(reference_tokens)
    cand_set = set(candidate_tokens)
    p = sum(t in ref_set for t in candidate_tokens) / len(candidate_tokens)
    r = sum(t in cand_set for t in reference_tokens) / len(reference_tokens)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def annotate_gold_label(pool_texts, gold_text, oracle=token_f1):
    """Index of the pool text the oracle scores closest to the gold text."""
    if not pool_texts:
        raise ConfigError("cannot annotate a gold label over an empty pool")
    scores = [oracle(cand, gold_text) for cand in pool_texts]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return best, scores[best]


def equation_kind_ids(eq_tokens):
    return [KIND_IDS[t.kind] for t in eq_tokens]


def make_equation_encoder(vocab_size, d, heads=8, layers=2, dropout=0.0):
    """Encoder over token + kind embeddings; shared with the generator."""
    kind_embed = nn.Embedding(len(KIND_IDS), d)
    nn.init.normal_(kind_embed.weight, std=0.02)
    return TransformerEncoder(vocab_size, d, heads, layers, dropout,
                              extra_embedding=kind_embed)


@dataclass
class PoolCache:
    """Per-epoch cache of candidate encodings (refreshed as Encoder_Q trains)."""

    instances: list
    ids: torch.Tensor           # (|P|, Lp) padded token ids
    pad_mask: torch.Tensor      # (|P|, Lp) bool
    U: torch.Tensor = None      # (|P|, Lp, d) candidate encodings
    h_p: torch.Tensor = None    # (|P|, d) pooled vectors
    graphs: list = field(default_factory=list)

    def __len__(self):
        return len(self.instances)


class Matcher(nn.Module):
    def __init__(self, vocab_size, d=256, heads=8, layers=2, dropout=0.0,
                 equation_encoder=None):
        super().__init__()
        self.d = d
        self.encoder_q = TransformerEncoder(vocab_size, d, heads, layers, dropout)
        self.encoder_e = equation_encoder or make_equation_encoder(
            vocab_size, d, heads, layers, dropout)
        self.g1 = nn.Sequential(nn.Linear(d, d), nn.ReLU(), nn.Linear(d, d))
        self.g2 = nn.Sequential(nn.Linear(d, d), nn.ReLU(), nn.Linear(d, d))
        self.W_r = nn.Parameter(torch.empty(d, d, d))
        self.w_r = nn.Parameter(torch.empty(d))
        self.W_a_p = nn.Parameter(torch.empty(d, d))
        nn.init.normal_(self.W_r, std=1.0 / d)
        nn.init.uniform_(self.w_r, -d ** -0.5, d ** -0.5)
        nn.init.xavier_uniform_(self.W_a_p)

    def encode_equation(self, ids, kind_ids, pad_mask=None):
        if ids.numel() == 0 or ids.shape[-1] == 0:
            raise EmptyInputError("cannot encode an empty equation")
        return self.encoder_e(ids, extra_ids=kind_ids, pad_mask=pad_mask)

    def encode_candidates(self, ids, pad_mask=None):
        U = self.encoder_q(ids, pad_mask=pad_mask)
        h_p, _ = masked_global_attention(U, self.W_a_p, pad_mask)
        return U, h_p

    def refresh_pool(self, cache: PoolCache):
        cache.U, cache.h_p = self.encode_candidates(cache.ids, cache.pad_mask)
        return cache

    def token_match_score(self, C, U, eq_pad_mask=None, cand_pad_mask=None):
        """Mean pairwise correlation over non-pad (equation, candidate) tokens.

        C: (N, d) or (B, N, d); U: (|P|, Lp, d).  Returns (|P|,) or (B, |P|).
        """
        squeeze = C.dim() == 2
        if squeeze:
            C = C.unsqueeze(0)
            eq_pad_mask = eq_pad_mask.unsqueeze(0) if eq_pad_mask is not None else None
        gc = self.g1(C)                      # (B, N, d)
        gu = self.g2(U)                      # (P, Lp, d)
        gamma = torch.einsum("bnd,pld->bpnl", gc, gu)
        keep_c = torch.ones(C.shape[:2], dtype=C.dtype, device=C.device) \
            if eq_pad_mask is None else (~eq_pad_mask).to(C.dtype)
        keep_u = torch.ones(U.shape[:2], dtype=U.dtype, device=U.device) \
            if cand_pad_mask is None else (~cand_pad_mask).to(U.dtype)
        pair_keep = torch.einsum("bn,pl->bpnl", keep_c, keep_u)
        s = (gamma * pair_keep).sum(dim=(2, 3)) / pair_keep.sum(dim=(2, 3)).clamp(min=1)
        return s.squeeze(0) if squeeze else s

    def domain_match_score(self, h_d, h_p):
        """Bilinear relevance r_i plus its scalar projection via w_r.

        h_d: (d,) or (B, d); h_p: (|P|, d).  Returns (r, scalar).
        """
        squeeze = h_d.dim() == 1
        if squeeze:
            h_d = h_d.unsqueeze(0)
        r = torch.einsum("bd,dac,pc->bpa", h_d, self.W_r, h_p)
        scalar = r @ self.w_r
        if squeeze:
            return r.squeeze(0), scalar.squeeze(0)
        return r, scalar

    def match_logits(self, C, h_d, cache: PoolCache, eq_pad_mask=None):
        s_em = self.token_match_score(C, cache.U, eq_pad_mask, cache.pad_mask)
        _, s_dm = self.domain_match_score(h_d, cache.h_p)
        return s_em + s_dm

    @staticmethod
    def match_distribution(logits):
        return torch.softmax(logits, dim=-1)

    @staticmethod
    def matching_loss(logits, gold_index):
        """Cross entropy of the pool distribution against the oracle label."""
        log_s = torch.log_softmax(logits, dim=-1)
        if logits.dim() == 1:
            return -log_s[gold_index]
        gold = torch.as_tensor(gold_index, device=logits.device)
        return -log_s.gather(1, gold.view(-1, 1)).squeeze(1).mean()

    def retrieve_top1(self, C, h_d, cache: PoolCache, eq_pad_mask=None,
                      exclude=None):
        """Highest-scoring candidate; ties and exclusions resolved by index."""
        logits = self.match_logits(C, h_d, cache, eq_pad_mask)
        if exclude is not None:
            logits = logits.clone()
            logits[..., exclude] = float("-inf")
        idx = int(torch.argmax(logits).item())
        return cache.instances[idx], idx, self.match_distribution(logits)
