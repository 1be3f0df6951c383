"""Bundled scenario files (``*.scn``)."""
