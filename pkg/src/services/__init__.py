"""Service layer: one service class per concern."""
