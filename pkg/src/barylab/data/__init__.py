"""Output tables and point readers."""
