"""
Config Package
Global numerical, sweep and output settings
"""
