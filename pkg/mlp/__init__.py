# mlp package initialization
# Network representation, gradients, optimizers, training strategies and datasets
