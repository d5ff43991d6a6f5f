"""Physical constants shared across the simulator."""

EARTH_RADIUS_M = 6371.0e3       # spherical Earth model
MU_EARTH = 3.98e14              # geocentric gravitational constant [m^3/s^2]
SPEED_OF_LIGHT = 299_792_458.0  # [m/s]
BOLTZMANN = 1.380649e-23        # [J/K]
