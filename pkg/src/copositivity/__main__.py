"""Entry point for the copositivity CLI."""

from .cli import main

if __name__ == "__main__":
    main()
