'''
laplace-hdc is a library for binary hyperdimensional computing with
Laplace-kernel structured hypervectors.

Hypervector construction, permutation binding and bit-packed encoding live in
:py:mod:`.core`.
Feature pipelines and classifiers are in :py:mod:`.learning`.
Dataset and model I/O, the verification suite and the command line tools are
in :py:mod:`.tools`.
'''
