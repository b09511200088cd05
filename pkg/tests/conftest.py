from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from greedymec import make_distribution, make_instance

settings.register_profile(
    "default", max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def exact_distributions(draw, min_n=1, max_n=6, max_weight=20):
    weights = draw(st.lists(st.integers(0, max_weight), min_size=min_n, max_size=max_n))
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return make_distribution([Fraction(w, total) for w in weights], "exact")


@st.composite
def float_distributions(draw, min_n=1, max_n=6):
    weights = draw(
        st.lists(
            st.floats(0.0, 1.0, allow_nan=False, allow_subnormal=False),
            min_size=min_n,
            max_size=max_n,
        )
    )
    if sum(weights) < 1e-3:
        weights[0] = 1.0
    return make_distribution(weights, "float64", renormalize=True)


@st.composite
def exact_instances(draw, max_m=4, max_n=5, max_weight=20):
    m = draw(st.integers(1, max_m))
    rows = [draw(exact_distributions(1, max_n, max_weight)).probs for _ in range(m)]
    return make_instance(rows, "exact")


@st.composite
def float_instances(draw, max_m=4, max_n=6):
    m = draw(st.integers(1, max_m))
    rows = [draw(float_distributions(1, max_n)).probs for _ in range(m)]
    return make_instance(rows, "float64")
