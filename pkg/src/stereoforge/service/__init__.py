"""Service facade: pydantic operation contracts shared by the HTTP API and
the CLI, plus the FastAPI application."""
