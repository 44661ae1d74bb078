from src.visualization.plots import plot_controls, plot_positions
