# Experiment package initialization
# Config parsing, the multi-seed runner and its report artifacts
