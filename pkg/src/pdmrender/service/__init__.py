"""FastAPI render service: session state and HTTP/WebSocket endpoints."""

from .app import create_app
from .session import NoSessionError, Session, SessionStore

__all__ = ["create_app", "Session", "SessionStore", "NoSessionError"]
