"""Test fixtures for MDT Workbench."""
