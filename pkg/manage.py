#!/usr/bin/env python
"""Entrada de los comandos: ingest, run, campaign, report, plot_data y test."""
import os
import sys


def main():
    # dev por defecto; en los servidores de cómputo exportar config.settings.prod
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.dev")
    from django.core.management import execute_from_command_line

    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
