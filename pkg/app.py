"""
vee-sgc
Main Entry Point

Quantum entropy of a V-type three-level atom with spontaneously generated
coherence:
1. Evolves the density matrix under the Lindblad equation
2. Solves for steady states and sweeps them over parameter grids
3. Emits column-oriented CSV for external plotting
4. Runs the oracle and invariant self-test
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.main import main


if __name__ == "__main__":
    sys.exit(main())
