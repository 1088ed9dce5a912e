"""Tree decoders over candidate spans."""
from .bruteforce import decode_bruteforce
from .kernels import BACKEND
from .mst import EdgeMatrix, chu_liu_edmonds, decode_mst, edge_matrix
from .projective import Chart, build_chart, decode_projective

__all__ = ["BACKEND", "Chart", "EdgeMatrix", "build_chart", "chu_liu_edmonds",
           "decode_bruteforce", "decode_mst", "decode_projective", "edge_matrix"]
