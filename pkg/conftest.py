# The benchmark project directory mleval/ shares its name with the
# installed mleval package; under rootdir-anchored test-module naming
# pytest would otherwise register that directory as a namespace package
# and shadow the real one.  Importing it up front pins sys.modules.
try:
    import mleval  # noqa: F401
except ImportError:
    pass
