'''
Dataset and model files via :py:mod:`.dataio`.
Numerical checks in :py:mod:`.verify`.
End-to-end runs in :py:mod:`.experiments` and :py:mod:`.cli`.
'''
