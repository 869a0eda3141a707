#!/usr/bin/env python3
"""
Launcher for the Trispec command line.
Run with: python run.py <command> [options]
"""
import sys
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Add app directory to path
sys.path.insert(0, str(Path(__file__).parent))

from app.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
