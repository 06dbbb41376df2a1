"""Run the main phmm entrypoint"""

import phmm

if __name__ == "__main__":
    phmm.main.select_action()
