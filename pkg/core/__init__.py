# core/__init__.py - Constants, exceptions and validation shared by all packages
