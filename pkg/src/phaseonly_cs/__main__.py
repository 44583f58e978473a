"""Allow ``python -m phaseonly_cs`` as an alias for the installed script."""

from .cli import main

if __name__ == "__main__":
    main()
