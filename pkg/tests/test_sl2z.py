import random

from hypothesis import given, settings, strategies as st

from modec.sl2z import (
    MatZ,
    S,
    T_pow,
    lift_slnz,
    random_kernel_words,
    st_decompose,
)


def random_sl2(rng: random.Random, size: int = 10**6) -> MatZ:
    """Random determinant-1 matrix from a random coprime bottom row."""
    import math

    while True:
        c, d = rng.randint(-size, size), rng.randint(-size, size)
        if math.gcd(c, d) == 1:
            break
    # a d - b c = 1 via extended Euclid, then a random T-shift on the left
    g, x, y = _xgcd(d, -c)
    a, b = x * g, y * g
    k = rng.randint(-50, 50)
    return T_pow(k) * MatZ(a, b, c, d)


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def test_st_round_trip_1000_random():
    rng = random.Random(20261018)
    for _ in range(1000):
        g = random_sl2(rng)
        assert g.a * g.d - g.b * g.c == 1
        assert st_decompose(g).matrix() == g


@given(st.lists(st.sampled_from(["S", "T", "t"]), max_size=40))
@settings(max_examples=300)
def test_st_round_trip_on_words(letters):
    g = MatZ(1, 0, 0, 1)
    for x in letters:
        g = g * (S if x == "S" else T_pow(1 if x == "T" else -1))
    w = st_decompose(g)
    assert w.matrix() == g
    # S letters never repeat back to back
    names = [n for n, _ in w.letters]
    assert all(not (a == b == "S") for a, b in zip(names, names[1:]))


def test_known_decompositions():
    assert st_decompose((0, -1, 1, 0)).matrix() == S
    assert str(st_decompose((1, 5, 0, 1))) == "T^5"
    assert st_decompose((-1, 0, 0, -1)).sign == -1


@given(st.integers(2, 60), st.data())
def test_lift_reduces_correctly(N, data):
    a = data.draw(st.integers(0, N - 1))
    b = data.draw(st.integers(0, N - 1))
    c = data.draw(st.integers(0, N - 1))
    import math

    if math.gcd(a, N) != 1:
        return
    d = pow(a, -1, N) * (1 + b * c) % N
    g = lift_slnz((a, b, c, d), N)
    assert g.reduce(N) == (a, b, c, d)


def test_kernel_words_are_trivial_mod_n():
    for g in random_kernel_words(36, 20, rng=random.Random(3)):
        r = g.reduce(36)
        assert r in ((1, 0, 0, 1), (35, 0, 0, 35))
