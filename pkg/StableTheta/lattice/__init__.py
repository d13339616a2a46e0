# StableTheta Lattice Module
