package toy.shapes;

/**
 * Base type for planar geometric figures.
 */
public abstract class Shape {

    /**
     * Computes the area of the shape.
     *
     * @return the area in square units
     */
    public abstract double area();

    /**
     * Returns the perimeter of the shape.
     */
    public abstract double perimeter();

    /** Builds a short description of the shape. */
    public String describe() {
        return getClass().getSimpleName();
    }

    /**
     * Scales the shape by the given factor.
     *
     * @param factor the multiplier applied to every dimension
     */
    public void scale(double factor) {
        throw new UnsupportedOperationException("scale");
    }
}
