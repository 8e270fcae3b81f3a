"""Library modules of the functional load toolkit."""
