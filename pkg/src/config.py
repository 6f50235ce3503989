import logging
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


# Helper to get typed environment variables
def get_env_var(var_name, default_value, var_type=str):
    value = os.getenv(var_name, default_value)
    try:
        return var_type(value)
    except ValueError:
        logger.warning(
            "Could not cast environment variable %s to %s. Using default: %s",
            var_name, var_type.__name__, default_value,
        )
        return var_type(default_value)


# Logging
LOG_LEVEL = os.getenv("FMM_LOG_LEVEL", "INFO")

# Geography
EARTH_RADIUS_KM = get_env_var("FMM_EARTH_RADIUS_KM", "6371.0", float)

# Checkin ingestion (default column layout of the public Gowalla snapshot)
CHECKIN_SEPARATOR = os.getenv("FMM_CHECKIN_SEPARATOR", "\t")
CHECKIN_COLUMNS_STR = os.getenv("FMM_CHECKIN_COLUMNS", "user,timestamp,lat,lng,location_id")
CHECKIN_COLUMNS = [column.strip() for column in CHECKIN_COLUMNS_STR.split(',')]
MAX_REJECTED_FRACTION = get_env_var("FMM_MAX_REJECTED_FRACTION", "0.5", float)

# Social analytics
MATCH_TIME_EPSILON_S = get_env_var("FMM_MATCH_TIME_EPSILON_S", "3600", float)
MATCH_SPACE_EPSILON_KM = get_env_var("FMM_MATCH_SPACE_EPSILON_KM", "0.1", float)
CURVE_PAIR_COUNT = get_env_var("FMM_CURVE_PAIR_COUNT", "3000", int)
CURVE_BIN_EDGES_STR = os.getenv("FMM_CURVE_BIN_EDGES", "0,50,100,200,400,800,1600,3200,6400,12800,20100")
CURVE_BIN_EDGES = [float(edge) for edge in CURVE_BIN_EDGES_STR.split(',')]
KNN_NEIGHBORS = get_env_var("FMM_KNN_NEIGHBORS", "5", int)

# Population estimation
POPULATION_SAMPLES = get_env_var("FMM_POPULATION_SAMPLES", "30", int)
POPULATION_SAMPLE_SIZE = get_env_var("FMM_POPULATION_SAMPLE_SIZE", "50", int)
POPULATION_REPEATS = get_env_var("FMM_POPULATION_REPEATS", "10", int)

# Mobility model building
MERGE_RADIUS_M = get_env_var("FMM_MERGE_RADIUS_M", "25", float)
FMM_SPEED = get_env_var("FMM_SPEED", "5.0", float)
FMM_MIN_SPEED = get_env_var("FMM_MIN_SPEED", "0.1", float)
FMM_MAX_SPEED = get_env_var("FMM_MAX_SPEED", "50.0", float)
FMM_DWELL_S = get_env_var("FMM_DWELL_S", "60", float)
FMM_MAX_GAP_S = get_env_var("FMM_MAX_GAP_S", "86400", float)

# Random waypoint (RWP column of the simulation details table)
RWP_MIN_SPEED = get_env_var("FMM_RWP_MIN_SPEED", "0", float)
RWP_MAX_SPEED = get_env_var("FMM_RWP_MAX_SPEED", "5", float)
RWP_PAUSE_TIME = get_env_var("FMM_RWP_PAUSE_TIME", "0", float)

# Simulation
SIM_DURATION = get_env_var("FMM_SIM_DURATION", "10000", float)
SIM_WIDTH = get_env_var("FMM_SIM_WIDTH", "2000", float)
SIM_HEIGHT = get_env_var("FMM_SIM_HEIGHT", "2000", float)
SIM_NODES = get_env_var("FMM_SIM_NODES", "15", int)
SIM_RADIO_RANGE = get_env_var("FMM_SIM_RADIO_RANGE", "250", float)
SIM_TICK = get_env_var("FMM_SIM_TICK", "1", float)
SIM_GRID_ROWS = get_env_var("FMM_SIM_GRID_ROWS", "10", int)
SIM_GRID_COLS = get_env_var("FMM_SIM_GRID_COLS", "10", int)

# Mock corpus parameters
MOCK_HOTSPOTS = get_env_var("FMM_MOCK_HOTSPOTS", "3", int)
MOCK_HOTSPOT_RADIUS_M = get_env_var("FMM_MOCK_HOTSPOT_RADIUS_M", "100", float)
MOCK_HOTSPOT_SPREAD_M = get_env_var("FMM_MOCK_HOTSPOT_SPREAD_M", "850", float)
MOCK_CHECKINS_PER_VISIT = get_env_var("FMM_MOCK_CHECKINS_PER_VISIT", "40", int)

# File Operations
DEFAULT_SAVE_PATH = os.getenv("FMM_DEFAULT_SAVE_PATH", "data/runs")
DEFAULT_SEED = get_env_var("FMM_SEED", "0", int)
