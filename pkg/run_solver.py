"""
Run the CT-MHD command line without installing the package

    python run_solver.py run configs/alfven2.5d.cfg
"""
from app.main import cli

if __name__ == "__main__":
    cli()
