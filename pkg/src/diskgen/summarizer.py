"""Latent-domain summarizer over the gold problem text.

Training-only component: encodes the text, extracts K candidate domain
vectors, scores them into a distribution beta, and mixes the global domain
embedding table into the text-domain vector.  At inference the pipeline
enumerates the table rows directly and never calls this module.
"""

from dataclasses import dataclass

import torch
import torch.nn as nn

from .errors import EmptyInputError
from .layers import TransformerEncoder, masked_global_attention


@dataclass
class DomainState:
    H: torch.Tensor        # (B, L, d)
    h_a: torch.Tensor      # (B, d)
    D_tilde: torch.Tensor  # (B, K, d)
    beta: torch.Tensor     # (B, K)
    h_d: torch.Tensor      # (B, d)


def orthogonality_loss(D_tilde):
    """Frobenius distance of the domain Gram matrix from the identity."""
    K = D_tilde.shape[-2]
    eye = torch.eye(K, dtype=D_tilde.dtype, device=D_tilde.device)
    gram = D_tilde @ D_tilde.transpose(-1, -2)
    diff = gram - eye
    return torch.linalg.matrix_norm(diff, ord="fro").mean()


class DomainSummarizer(nn.Module):
    def __init__(self, vocab_size, d=256, K=25, L_max=48, heads=8, layers=2,
                 dropout=0.0):
        super().__init__()
        self.d, self.K, self.L_max = d, K, L_max
        self.encoder = TransformerEncoder(vocab_size, d, heads, layers, dropout)
        self.W_a = nn.Parameter(torch.empty(d, d))
        self.W_D1 = nn.Parameter(torch.empty(K, L_max))
        self.b_D1 = nn.Parameter(torch.zeros(d))
        self.W_D2 = nn.Parameter(torch.empty(d, d))
        self.b_D2 = nn.Parameter(torch.zeros(d))
        self.v = nn.Parameter(torch.empty(d))
        self.H_d = nn.Parameter(torch.empty(d, d))
        self.U_d = nn.Parameter(torch.empty(d, d))
        self.E = nn.Parameter(torch.empty(K, d))
        self.reset_parameters()

    def reset_parameters(self):
        for w in (self.W_a, self.W_D1, self.W_D2, self.H_d, self.U_d):
            nn.init.xavier_uniform_(w)
        nn.init.normal_(self.E, std=0.02)
        nn.init.uniform_(self.v, -self.d ** -0.5, self.d ** -0.5)

    def encode_text(self, ids, pad_mask=None):
        if ids.numel() == 0 or ids.shape[-1] == 0:
            raise EmptyInputError("cannot encode an empty text")
        return self.encoder(ids, pad_mask=pad_mask)

    def global_attention(self, H, pad_mask=None):
        return masked_global_attention(H, self.W_a, pad_mask)

    def extract_domains(self, H, pad_mask=None):
        """Fuse the (zero-padded to L_max) text encoding into K domain rows."""
        B, L, d = H.shape
        if pad_mask is not None:
            H = H.masked_fill(pad_mask.unsqueeze(-1), 0.0)
        if L < self.L_max:
            pad = torch.zeros(B, self.L_max - L, d, dtype=H.dtype, device=H.device)
            H = torch.cat([H, pad], dim=1)
        elif L > self.L_max:
            H = H[:, : self.L_max]
        inner = H @ self.W_D2 + self.b_D2
        return torch.tanh(torch.einsum("kl,bld->bkd", self.W_D1, inner) + self.b_D1)

    def domain_distribution(self, h_a, D_tilde):
        mixed = torch.tanh(
            (h_a @ self.H_d.T).unsqueeze(1) + D_tilde @ self.U_d.T)
        logits = mixed @ self.v
        return torch.softmax(logits, dim=-1)

    def text_domain_vector(self, beta):
        return beta @ self.E

    def forward(self, ids, pad_mask=None):
        H = self.encode_text(ids, pad_mask)
        h_a, _ = self.global_attention(H, pad_mask)
        D_tilde = self.extract_domains(H, pad_mask)
        beta = self.domain_distribution(h_a, D_tilde)
        h_d = self.text_domain_vector(beta)
        return DomainState(H=H, h_a=h_a, D_tilde=D_tilde, beta=beta, h_d=h_d)

    def domain_row(self, k):
        """Enumerated domain vector used at inference."""
        return self.E[k]
