# Config module initialization
# Contains runtime settings and experiment configuration files
