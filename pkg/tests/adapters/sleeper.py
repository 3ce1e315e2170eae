"""Adapter that stalls long past any reasonable timeout."""

import sys
import time

sys.stdin.readline()
time.sleep(30)
sys.stdout.write("{}\n")
