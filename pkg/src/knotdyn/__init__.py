"""knotdyn: a laboratory for knot dynamics under self-repulsion.

Exact rational-tangle algebra, beaded curve embeddings, knot-type
preserving evolution, scripted experiments and a live steering service.
"""

__version__ = "0.1.0"
