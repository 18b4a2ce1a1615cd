"""Allow `python -m starcluster`."""
from .cli import main

main()
