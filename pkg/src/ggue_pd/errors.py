"""Exception types shared across the package."""

from __future__ import annotations


class PrecisionNotConverged(ArithmeticError):
    """A multiprecision computation failed to reach its requested accuracy.

    Raised by quadrature when successive refinement levels stop agreeing, and
    by the Hankel factorization when a pivot goes non-positive.  Callers that
    hold a PrecisionContext are expected to escalate the working precision and
    retry; if the escalation ladder is exhausted the exception propagates.
    """


class VerificationError(RuntimeError):
    """An internal cross-check (closed form vs. independent route) failed."""
