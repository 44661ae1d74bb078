from src.agents.driver import Driver, DriverSettings, driver_step
from src.agents.driver_params import DriverParams, DriverRanges, sample_driver
from src.agents.memory import Memory
from src.agents.population import Population, Regime
