"""Namespace package for project modules."""
