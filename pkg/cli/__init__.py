"""
Command-Line Package
"""
