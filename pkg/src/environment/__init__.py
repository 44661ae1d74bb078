from src.environment.dynamics import BodyGeometry, ControlInput, VehicleState
from src.environment.road import Road
from src.environment.time_system import TimeSystem
