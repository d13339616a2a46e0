# StableTheta Forms Module
