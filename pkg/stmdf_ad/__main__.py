import sys

from stmdf_ad.main import main

if __name__ == "__main__":
    sys.exit(main())
