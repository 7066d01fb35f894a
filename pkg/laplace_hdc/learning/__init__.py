'''
Image :py:mod:`.features` and the :py:mod:`.classifiers` trained on encoded hypervectors.
'''
