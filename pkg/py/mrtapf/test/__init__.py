def test_suite():
    """Returns unittest.TestSuite of mrtapf tests for setup.py test

    Set $MRTAPF_LONG_TESTS to include the statistical and full-protocol runs.
    """
    import unittest
    from os.path import dirname
    test_dir = dirname(__file__)
    return unittest.defaultTestLoader.discover(test_dir, pattern='test_*.py',
                                               top_level_dir=dirname(dirname(test_dir)))
