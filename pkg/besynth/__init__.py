"""
besynth - best-effort synthesis for LTLf goals under LTLf environment specifications.
"""

__version__ = "0.1.0"
