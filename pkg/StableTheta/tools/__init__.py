# StableTheta Tools Module
