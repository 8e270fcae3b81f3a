# Functional Load Toolkit
__version__ = "0.3.0"
__license__ = "MIT"
