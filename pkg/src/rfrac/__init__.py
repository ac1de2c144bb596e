"""Regional fractional Laplacian on intervals: assembly, solvers and boundary diagnostics."""
