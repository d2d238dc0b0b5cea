"""Core utilities: settings, logging, exceptions, seeding and norms."""
