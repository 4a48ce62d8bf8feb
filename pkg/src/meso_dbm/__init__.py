# Mesoscopic fluctuations of Dyson Brownian motion
__version__ = "1.0.0"
