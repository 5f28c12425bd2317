"""pulsemon: self-updating monitor of emotional expression in social media."""

__version__ = "0.1.0"
