# Test suite for the layer-wise training library
