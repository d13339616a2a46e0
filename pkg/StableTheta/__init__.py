# StableTheta Package
