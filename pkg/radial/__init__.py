# Radial discretization: grids, quadrature and polyharmonic operators on the unit ball
