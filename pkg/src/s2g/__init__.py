"""Turn annotated stories into playable text adventures.

The package is organised as a pipeline: a story is generated and annotated
(:mod:`s2g.pipeline`), compiled against a world graph (:mod:`s2g.world`,
:mod:`s2g.compiler`), and then played through a runtime (:mod:`s2g.runtime`)
that can also invent brand new actions mid-game (:mod:`s2g.dynamic`).
"""

__version__ = "0.1.0"
