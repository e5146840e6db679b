import numpy as np
import pytest

from fgn.glyphs import GlyphAtlas


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_atlas():
    """Two stored glyphs plus deterministic fallbacks for everything else."""
    atlas = GlyphAtlas(fallback_seed=5)
    atlas.add(0x6211, np.full((50, 50), 0.25))
    atlas.add(0x7231, np.linspace(0, 1, 2500).reshape(50, 50))
    return atlas
