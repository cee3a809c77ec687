"""
Sweep Package
"""
