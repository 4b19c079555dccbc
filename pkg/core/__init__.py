# Core module initialization
# Contains configuration, errors, logging setup and the seeded generator
