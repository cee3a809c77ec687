"""
Atomic Physics Package
"""
