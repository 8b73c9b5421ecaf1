# Numerical core: channels, discrimination, optimization, information, simulation
