'''
Binary hypervector encoding

Base hypervectors, as defined via :class:`.hypervectors.HypervectorSet`, are
drawn from a Gaussian factorization of the sine transform of a
:py:mod:`.kernel` and bound together by the structured permutation families of
:py:mod:`.permutations`. The bit-packed encoding itself is implemented in
:py:mod:`.encoder`; dense linear algebra is in :py:mod:`.numerics`.
'''
