import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lineocr.model import box_polygon, make_page  # noqa: E402


def stacked_page(page_id: str, texts, *, line_height: float = 20.0, width: int = 1000):
    """Page with one full-width box per line, top to bottom in the given order."""
    polys = [box_polygon(10, 10 + i * (line_height + 10), width - 10, 10 + i * (line_height + 10) + line_height)
             for i in range(len(texts))]
    height = int(20 + len(texts) * (line_height + 10))
    return make_page(page_id, texts, polygons=polys, width=width, height=height)


@pytest.fixture
def stacked():
    return stacked_page
