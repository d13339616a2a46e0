# StableTheta Utils Module
