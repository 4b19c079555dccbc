# Layer-wise MLP training experiments
# Root package initialization
