#!/usr/bin/env python
"""Command line entry point: python manage.py {fit,simulate,equivariance,breakdown,timing,crossval,datasets}."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'Shrinkreg.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the requirements with "
            "`pip install -r requirements.txt` before running shrinkreg commands."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
