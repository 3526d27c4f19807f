"""SplitMix64: a tiny, fully specified 64-bit generator.

Chosen over ``random``/``numpy.random`` so experiment streams are identical
across platforms and library versions.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()


def substream(seed: int, *keys: int) -> SplitMix64:
    """Independent generator for a (seed, key...) tuple."""
    state = mix64(seed)
    for k in keys:
        state = mix64(state ^ mix64((k + 1) * GOLDEN))
    return SplitMix64(state)
