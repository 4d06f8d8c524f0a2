import pathlib
import setuptools
from setuptools import setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

setup(
    name="ham-levy",
    version="0.3.0",
    description="Simulation and verification toolkit for the hyperbolic Anderson model driven by Lévy colored noise.",
    long_description=README,
    long_description_content_type="text/markdown",
    license="GPL-3.0",
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics"
    ],
    packages=setuptools.find_packages(exclude=["tests"]),
    python_requires=">=3.8",
    install_requires=[
        'PyQt5==5.15.9',
        'fuzzywuzzy==0.18.0',
        'numpy==1.26.4',
        'scipy==1.11.4',
        'joblib==1.3.2'
    ],
    extras_require={
        "test": [
            'pytest==7.4.4',
            'hypothesis==6.92.1'
        ]
    },
    include_package_data=True,
    package_data={"hamlevy": ["plugins/*.py"]},
    entry_points={
        "console_scripts": [
            "hamlevy=hamlevy.runner:main",
        ]
    },
)
