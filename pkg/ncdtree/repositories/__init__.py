# Repository layer
