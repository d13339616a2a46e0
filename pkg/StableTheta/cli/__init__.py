# StableTheta CLI Module
