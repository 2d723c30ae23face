"""Typed domain models shared by every workbench module."""
