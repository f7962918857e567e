class Shape {
public:
  int width;
  int w(){
    return width;
  }
};
