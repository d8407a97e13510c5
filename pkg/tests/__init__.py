"""Test ordtree."""
