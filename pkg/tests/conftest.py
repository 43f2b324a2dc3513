import pytest

from ggue_pd import PrecisionContext, WeightSpec, recurrence_table


def target_for(n: int) -> int:
    return max(200, 12 * n)


@pytest.fixture(scope="session")
def table_for():
    """Builder for recurrence tables at the default precision policy.

    recurrence_table memoizes on (spec, n_max, digits), so every test module
    asking for the same grid point shares one computation."""
    def build(lam, s, n, depth=None):
        ctx = PrecisionContext(target_digits=target_for(n))
        n_max = (n + 1) if depth is None else depth
        return recurrence_table(WeightSpec(lam, s, n), n_max, ctx), ctx
    return build
