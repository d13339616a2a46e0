# StableTheta Configuration Module
