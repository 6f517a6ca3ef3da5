"""Test initialization."""

# Tests can be run with: pytest expanding_graph_filters/tests/
# Or with coverage: pytest --cov=expanding_graph_filters expanding_graph_filters/tests/
# Desk-scale reproductions: pytest -m slow
