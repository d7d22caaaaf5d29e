"""
Visual palettes for the pixel-art renderer.

Each palette carries colour ramps for floor, wall and trap tiles, sprite
colours for the player and the treasure, and one "key" colour per cell class.
Key colours fill the centre of every tile so an image can be decoded back to
its grid; they are pairwise distinct inside a palette.
"""
from dataclasses import dataclass
from typing import Dict, Tuple

RGB = Tuple[int, int, int]


def rgb(hex_color: str) -> RGB:
    hex_color = hex_color.lstrip("#")
    return tuple(int(hex_color[i:i + 2], 16) for i in (0, 2, 4))


@dataclass(frozen=True)
class Palette:
    name: str
    backdrop: RGB
    floor: Tuple[RGB, RGB, RGB]   # base, speck, shade
    wall: Tuple[RGB, RGB, RGB]    # base, mortar, highlight
    trap: Tuple[RGB, RGB, RGB]    # base, spike, outline
    player: Tuple[RGB, RGB]       # body, trim
    treasure: Tuple[RGB, RGB]     # chest, lid
    sprite_seed: int

    @property
    def keys(self) -> Dict[str, RGB]:
        """Centre colour per cell class: open, wall, trap, start, goal."""
        return {
            "open": self.floor[0],
            "wall": self.wall[0],
            "trap": self.trap[1],
            "start": self.player[0],
            "goal": self.treasure[0],
        }


PALETTES: Dict[str, Palette] = {
    "forest": Palette(
        name="forest",
        backdrop=rgb("#12210f"),
        floor=(rgb("#5f8f3e"), rgb("#78a852"), rgb("#4c7731")),
        wall=(rgb("#2f4a22"), rgb("#1c2d14"), rgb("#466b32")),
        trap=(rgb("#7a2a4a"), rgb("#e0406a"), rgb("#2a0c18")),
        player=(rgb("#2f6fd8"), rgb("#f2d3a0")),
        treasure=(rgb("#e8b830"), rgb("#8a5a1c")),
        sprite_seed=0x0F0E57,
    ),
    "desert": Palette(
        name="desert",
        backdrop=rgb("#3a2a14"),
        floor=(rgb("#e2c48a"), rgb("#f0d8a6"), rgb("#c9a66a")),
        wall=(rgb("#8c5a2e"), rgb("#5e3a1a"), rgb("#a8744a")),
        trap=(rgb("#6a2c8c"), rgb("#c860f0"), rgb("#2a0e3a")),
        player=(rgb("#1e7fb8"), rgb("#ffe0b8")),
        treasure=(rgb("#f6d040"), rgb("#9a6a1e")),
        sprite_seed=0xDE5E47,
    ),
    "dungeon": Palette(
        name="dungeon",
        backdrop=rgb("#0b0b12"),
        floor=(rgb("#6e6a78"), rgb("#858192"), rgb("#5a5664")),
        wall=(rgb("#2a2838"), rgb("#16141f"), rgb("#403d52")),
        trap=(rgb("#8a1c1c"), rgb("#ff5a2a"), rgb("#300606")),
        player=(rgb("#30b0e0"), rgb("#f0e0c0")),
        treasure=(rgb("#f0c020"), rgb("#7a4e10")),
        sprite_seed=0xD06E0,
    ),
    "meadow": Palette(
        name="meadow",
        backdrop=rgb("#1f3a2a"),
        floor=(rgb("#a8d878"), rgb("#c0e898"), rgb("#90c062")),
        wall=(rgb("#5a6e7a"), rgb("#3a4a54"), rgb("#7a909c")),
        trap=(rgb("#b02c6c"), rgb("#ff4aa0"), rgb("#40081e")),
        player=(rgb("#3a4ae8"), rgb("#ffe4c4")),
        treasure=(rgb("#ffb81c"), rgb("#8c5414")),
        sprite_seed=0x3EAD0,
    ),
}

PALETTE_NAMES: Tuple[str, ...] = tuple(PALETTES)


def get_palette(name: str) -> Palette:
    try:
        return PALETTES[name.lower()]
    except KeyError:
        raise ValueError(
            f"Unsupported palette: {name}. Supported palettes: {', '.join(PALETTE_NAMES)}"
        ) from None
