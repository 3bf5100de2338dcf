import setuptools
import os

with open('requirements.txt') as reqf:
    requirements = reqf.readlines()

with open('README.md') as readme:
    long_description = readme.read()



setuptools.setup(
    name='ldi-tool',
    description='A Python program for generating, composing, and re-rendering layered depth images',
    long_description=long_description,
    long_description_content_type='text/markdown',
    version='1.0.0',
    author='layeredDepth developers',
    license='BSD (3-clause)',
    packages=setuptools.find_packages(exclude=['tests', 'docs', '__pycache__']),
    py_modules=['layeredCLI'],
    include_package_data=True,
    python_requires='>=3.7',
    install_requires=requirements,
    keywords='layered depth image view synthesis scene decomposition dataset',
    entry_points={
        'console_scripts': [
            'ldi-tool = layeredCLI:main',
        ],
    },
    extras_require={
        'test': ['pytest'],
        'yaml': ['pyyaml'],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',

        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
)
