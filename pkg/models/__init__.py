"""Pydantic models for scenario configs and reports."""
