import os
import sys

# modules import each other from the application directory
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
