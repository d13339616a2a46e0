# StableTheta Analysis Module
